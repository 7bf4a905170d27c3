using VectorCad.Core;
using VectorCad.Util;

namespace VectorCad.Ui
{
    /// <summary>
    /// Top-level window: owns the document, wires the canvas to the
    /// document's change event, and logs shape operations.
    /// </summary>
    [Serializable]
    public class MainWindow
    {
        private Document m_document;
        private CanvasPanel m_canvas;

        public MainWindow()
        {
            m_document = new Document("untitled");
            m_canvas = new CanvasPanel(m_document);
            m_document.Changed += new DocumentChangedHandler(m_canvas.OnShapeChanged);
        }

        public void OpenShape(Shape shape)
        {
            m_document.AddShape(shape);
            Logger.Instance().Write("shape added");
        }
    }
}
